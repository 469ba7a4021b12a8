#pragma once

#include "herzkit/core_linalg.hpp"
#include "herzkit/gamma2.hpp"
#include "herzkit/herz.hpp"
#include "herzkit/isometry.hpp"
#include "herzkit/multiplier.hpp"
#include "herzkit/norm_bracket.hpp"
#include "herzkit/parallel.hpp"
#include "herzkit/structure_maps.hpp"
