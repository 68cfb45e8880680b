#pragma once

#include "restake/interface/analysis.hpp"
#include "restake/interface/cli.hpp"
#include "restake/interface/manifest.hpp"
#include "restake/interface/report.hpp"
#include "restake/interface/service.hpp"
#include "restake/interface/svg.hpp"
