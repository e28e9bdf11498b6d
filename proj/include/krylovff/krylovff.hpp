#pragma once

#include "krylovff/correlations.hpp"
#include "krylovff/error.hpp"
#include "krylovff/exact.hpp"
#include "krylovff/experiment.hpp"
#include "krylovff/io.hpp"
#include "krylovff/krylov.hpp"
#include "krylovff/models.hpp"
#include "krylovff/observables.hpp"
#include "krylovff/pauli.hpp"
#include "krylovff/selection.hpp"
#include "krylovff/series.hpp"
#include "krylovff/spectrum.hpp"
#include "krylovff/state.hpp"
