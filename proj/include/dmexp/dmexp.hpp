#pragma once

#include "dmexp/applications/discrimination.hpp"
#include "dmexp/applications/grover.hpp"
#include "dmexp/applications/orthogonality.hpp"
#include "dmexp/applications/phase_estimation.hpp"
#include "dmexp/applications/state_addition.hpp"
#include "dmexp/applications/tomography.hpp"
#include "dmexp/error.hpp"
#include "dmexp/gadgets.hpp"
#include "dmexp/io.hpp"
#include "dmexp/jordan_lie.hpp"
#include "dmexp/linalg.hpp"
#include "dmexp/lmr.hpp"
#include "dmexp/report.hpp"
#include "dmexp/rng.hpp"
#include "dmexp/selftest.hpp"
#include "dmexp/universal.hpp"
