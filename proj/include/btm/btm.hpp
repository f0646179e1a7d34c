#pragma once

#include "btm/backend.hpp"
#include "btm/cgs.hpp"
#include "btm/corpus.hpp"
#include "btm/divergence.hpp"
#include "btm/error.hpp"
#include "btm/incremental.hpp"
#include "btm/matrix.hpp"
#include "btm/metrics.hpp"
#include "btm/model.hpp"
#include "btm/online.hpp"
#include "btm/random.hpp"
#include "btm/schedule.hpp"
#include "btm/scvb0.hpp"
#include "btm/sdm.hpp"
#include "btm/synth.hpp"
