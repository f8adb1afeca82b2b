#pragma once

// Umbrella header for the whole library.

#include "ehypo/common.hpp"
#include "ehypo/exponential.hpp"
#include "ehypo/exponentiated.hpp"
#include "ehypo/exphypo.hpp"
#include "ehypo/fit.hpp"
#include "ehypo/gof.hpp"
#include "ehypo/hypoexp.hpp"
#include "ehypo/mee.hpp"
#include "ehypo/optimize.hpp"
