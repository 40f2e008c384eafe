#ifndef KSPM_KSPM_HPP
#define KSPM_KSPM_HPP

#include "kspm/barenblatt.hpp"
#include "kspm/config.hpp"
#include "kspm/errors.hpp"
#include "kspm/field_families.hpp"
#include "kspm/fixed_point.hpp"
#include "kspm/grid.hpp"
#include "kspm/initial.hpp"
#include "kspm/montecarlo.hpp"
#include "kspm/noise.hpp"
#include "kspm/norms.hpp"
#include "kspm/params.hpp"
#include "kspm/rng.hpp"
#include "kspm/schedule.hpp"
#include "kspm/snapshot_io.hpp"
#include "kspm/spectral.hpp"
#include "kspm/u_step.hpp"
#include "kspm/v_step.hpp"
#include "kspm/verification.hpp"

#endif  // KSPM_KSPM_HPP
