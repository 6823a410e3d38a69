#pragma once

#include "fewbose/catalog.hpp"
#include "fewbose/constants.hpp"
#include "fewbose/errors.hpp"
#include "fewbose/io.hpp"
#include "fewbose/kernel.hpp"
#include "fewbose/quadrature.hpp"
#include "fewbose/recomb.hpp"
#include "fewbose/special.hpp"
#include "fewbose/trimers.hpp"
#include "fewbose/twobody.hpp"
#include "fewbose/units.hpp"
