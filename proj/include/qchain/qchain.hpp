#pragma once

#include "qchain/analysis.hpp"
#include "qchain/bounds.hpp"
#include "qchain/chain.hpp"
#include "qchain/common.hpp"
#include "qchain/config.hpp"
#include "qchain/dephasing.hpp"
#include "qchain/ensemble.hpp"
#include "qchain/lindblad.hpp"
#include "qchain/output.hpp"
#include "qchain/pauli.hpp"
#include "qchain/propagator.hpp"
#include "qchain/rng.hpp"
#include "qchain/runner.hpp"
#include "qchain/trajectory.hpp"
