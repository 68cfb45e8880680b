#pragma once

#include "restake/pipeline/features.hpp"
#include "restake/pipeline/fetch.hpp"
#include "restake/pipeline/panel.hpp"
#include "restake/pipeline/series.hpp"
#include "restake/pipeline/summary.hpp"
#include "restake/pipeline/synthetic.hpp"
