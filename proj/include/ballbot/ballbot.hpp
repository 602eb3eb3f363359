#ifndef BALLBOT_BALLBOT_HPP
#define BALLBOT_BALLBOT_HPP

#include "ballbot/config.hpp"
#include "ballbot/errors.hpp"
#include "ballbot/integrators.hpp"
#include "ballbot/lpv.hpp"
#include "ballbot/mpc.hpp"
#include "ballbot/param_refine.hpp"
#include "ballbot/params.hpp"
#include "ballbot/qp.hpp"
#include "ballbot/rigid_body.hpp"
#include "ballbot/scenarios.hpp"
#include "ballbot/synthesis.hpp"

#endif  // BALLBOT_BALLBOT_HPP
