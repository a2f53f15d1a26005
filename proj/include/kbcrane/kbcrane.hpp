#pragma once

#include "kbcrane/types.hpp"
#include "kbcrane/kinematics.hpp"
#include "kbcrane/dynamics.hpp"
#include "kbcrane/energy.hpp"
#include "kbcrane/riccati.hpp"
#include "kbcrane/control.hpp"
#include "kbcrane/simulation.hpp"
#include "kbcrane/csv.hpp"
#include "kbcrane/config.hpp"
#include "kbcrane/plot_svg.hpp"
#include "kbcrane/properties.hpp"
#include "kbcrane/version.hpp"
