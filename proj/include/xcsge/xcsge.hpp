#pragma once

#include "xcsge/data.hpp"
#include "xcsge/ensemble.hpp"
#include "xcsge/learners.hpp"
#include "xcsge/members.hpp"
#include "xcsge/metrics.hpp"
#include "xcsge/score.hpp"
#include "xcsge/serialize.hpp"
#include "xcsge/softgate.hpp"
#include "xcsge/stats.hpp"
#include "xcsge/weighting.hpp"
