#pragma once

#include "netid/arx.hpp"
#include "netid/cli.hpp"
#include "netid/glasso.hpp"
#include "netid/informativity.hpp"
#include "netid/io.hpp"
#include "netid/network.hpp"
#include "netid/pipeline.hpp"
#include "netid/polynomial.hpp"
#include "netid/simulate.hpp"
#include "netid/topology.hpp"
#include "netid/wnsf.hpp"
