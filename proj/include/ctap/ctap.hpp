#pragma once

#include "ctap/error.hpp"
#include "ctap/ionmap.hpp"
#include "ctap/propagate.hpp"
#include "ctap/pulse.hpp"
#include "ctap/rect.hpp"
#include "ctap/stirap3.hpp"
#include "ctap/tri.hpp"
