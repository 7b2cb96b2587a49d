#pragma once

#include "lcf2pa/constants.hpp"
#include "lcf2pa/error.hpp"
#include "lcf2pa/table.hpp"
#include "lcf2pa/quadrature.hpp"
#include "lcf2pa/csv.hpp"
#include "lcf2pa/optics.hpp"
#include "lcf2pa/propagation.hpp"
#include "lcf2pa/c2pa.hpp"
#include "lcf2pa/e2pa.hpp"
#include "lcf2pa/jsi.hpp"
#include "lcf2pa/frames.hpp"
#include "lcf2pa/frames_io.hpp"
#include "lcf2pa/uncertainty.hpp"
#include "lcf2pa/jsonio.hpp"
#include "lcf2pa/config.hpp"
#include "lcf2pa/report.hpp"
