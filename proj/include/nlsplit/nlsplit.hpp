#pragma once

#include "nlsplit/errors.hpp"
#include "nlsplit/grid.hpp"
#include "nlsplit/spectral.hpp"
#include "nlsplit/norms.hpp"
#include "nlsplit/flows.hpp"
#include "nlsplit/diagnostics.hpp"
