#pragma once

#include "netslice/admm_async.hpp"
#include "netslice/admm_sync.hpp"
#include "netslice/barrier.hpp"
#include "netslice/instance_io.hpp"
#include "netslice/local_prox.hpp"
#include "netslice/model.hpp"
#include "netslice/oracle.hpp"
#include "netslice/scaled.hpp"
#include "netslice/scenario.hpp"
#include "netslice/sim.hpp"
#include "netslice/trace.hpp"
