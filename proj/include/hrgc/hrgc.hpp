#pragma once

// Umbrella header for the whole library.

#include "hrgc/capability.hpp"
#include "hrgc/code.hpp"
#include "hrgc/engine.hpp"
#include "hrgc/error.hpp"
#include "hrgc/gf.hpp"
#include "hrgc/hermitian.hpp"
#include "hrgc/hmbr.hpp"
#include "hrgc/hmsr.hpp"
#include "hrgc/matrix.hpp"
#include "hrgc/mds.hpp"
#include "hrgc/node_file.hpp"
#include "hrgc/profile.hpp"
#include "hrgc/rng.hpp"
#include "hrgc/sim.hpp"
