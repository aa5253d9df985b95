#pragma once

// Umbrella header: quasi-Hermitian matrix toolkit.

#include "quasiherm/biortho.hpp"
#include "quasiherm/dynamics.hpp"
#include "quasiherm/dyson.hpp"
#include "quasiherm/errors.hpp"
#include "quasiherm/io.hpp"
#include "quasiherm/krein.hpp"
#include "quasiherm/matkernel.hpp"
#include "quasiherm/metric.hpp"
#include "quasiherm/models.hpp"
#include "quasiherm/report.hpp"
#include "quasiherm/types.hpp"
