#pragma once

#include "isomass/errors.hpp"
#include "isomass/numerics.hpp"
#include "isomass/profile_dsl.hpp"
#include "isomass/geometry.hpp"
#include "isomass/flow.hpp"
#include "isomass/capacity.hpp"
#include "isomass/specfun.hpp"
#include "isomass/masses.hpp"
#include "isomass/generators.hpp"
#include "isomass/config.hpp"
