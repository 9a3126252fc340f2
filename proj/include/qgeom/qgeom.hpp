#pragma once

#include "qgeom/error.hpp"
#include "qgeom/pauli.hpp"
#include "qgeom/rng.hpp"
#include "qgeom/stats.hpp"
#include "qgeom/unitary.hpp"
#include "qgeom/lie_closure.hpp"
#include "qgeom/complexity.hpp"
#include "qgeom/haar.hpp"
#include "qgeom/barren_plateau.hpp"
