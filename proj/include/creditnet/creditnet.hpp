#pragma once

// Everything in one include.

#include "creditnet/error.hpp"
#include "creditnet/tokens.hpp"
#include "creditnet/network.hpp"
#include "creditnet/io.hpp"
#include "creditnet/lp.hpp"
#include "creditnet/throughput.hpp"
#include "creditnet/deadlock.hpp"
#include "creditnet/topology.hpp"
#include "creditnet/demand.hpp"
#include "creditnet/peeling.hpp"
#include "creditnet/oracle.hpp"
#include "creditnet/sat.hpp"
#include "creditnet/lt_analysis.hpp"
#include "creditnet/synthesis.hpp"
#include "creditnet/harness.hpp"
