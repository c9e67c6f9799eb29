#pragma once

// Elastic flow of inextensible curves with cubic C^1 Hermite elements.

#include "eflow/mesh.hpp"
#include "eflow/quadrature.hpp"
#include "eflow/hermite.hpp"
#include "eflow/interpolate.hpp"
#include "eflow/banded.hpp"
#include "eflow/assembly.hpp"
#include "eflow/saddle.hpp"
#include "eflow/forcing.hpp"
#include "eflow/flow.hpp"
#include "eflow/analysis.hpp"
#include "eflow/config.hpp"
