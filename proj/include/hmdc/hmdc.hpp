#pragma once

// Umbrella header for the HMDC compressed linear-operator library.

#include "hmdc/bench.hpp"
#include "hmdc/container.hpp"
#include "hmdc/csr.hpp"
#include "hmdc/dense.hpp"
#include "hmdc/error.hpp"
#include "hmdc/hmd.hpp"
#include "hmdc/lmf.hpp"
#include "hmdc/lstm.hpp"
#include "hmdc/operator.hpp"
#include "hmdc/random.hpp"
#include "hmdc/svd.hpp"
