#pragma once

// Umbrella header for the whole library.

#include "duoglass/anchors.hpp"
#include "duoglass/charts.hpp"
#include "duoglass/config.hpp"
#include "duoglass/electro_optics.hpp"
#include "duoglass/errors.hpp"
#include "duoglass/image.hpp"
#include "duoglass/panel.hpp"
#include "duoglass/parallel.hpp"
#include "duoglass/schedule.hpp"
#include "duoglass/simulate.hpp"
#include "duoglass/study.hpp"
#include "duoglass/text.hpp"
