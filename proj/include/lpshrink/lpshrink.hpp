#pragma once

#include "lpshrink/estimator.hpp"
#include "lpshrink/format.hpp"
#include "lpshrink/mc.hpp"
#include "lpshrink/minimax.hpp"
#include "lpshrink/phi.hpp"
#include "lpshrink/pnorm.hpp"
#include "lpshrink/report.hpp"
#include "lpshrink/risk.hpp"
#include "lpshrink/rng.hpp"
#include "lpshrink/verify.hpp"
