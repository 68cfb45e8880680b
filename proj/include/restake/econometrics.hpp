#pragma once

#include "restake/econometrics/adf.hpp"
#include "restake/econometrics/chow.hpp"
#include "restake/econometrics/design_matrix.hpp"
#include "restake/econometrics/distributions.hpp"
#include "restake/econometrics/granger.hpp"
#include "restake/econometrics/lag.hpp"
#include "restake/econometrics/mackinnon.hpp"
#include "restake/econometrics/ols.hpp"
#include "restake/econometrics/report.hpp"
#include "restake/econometrics/test_result.hpp"
#include "restake/econometrics/vif.hpp"
#include "restake/econometrics/winsorize.hpp"
