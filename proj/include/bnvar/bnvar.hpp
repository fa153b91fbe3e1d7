#pragma once

#include "bnvar/bounds.hpp"
#include "bnvar/error.hpp"
#include "bnvar/mc_variance.hpp"
#include "bnvar/moment_propagation.hpp"
#include "bnvar/network.hpp"
#include "bnvar/network_json.hpp"
#include "bnvar/oracle.hpp"
#include "bnvar/parameter_moments.hpp"
#include "bnvar/point_inference.hpp"
#include "bnvar/report.hpp"
#include "bnvar/sampling.hpp"
#include "bnvar/special_functions.hpp"
#include "bnvar/topology.hpp"
