#pragma once

// Everything: kernel, q-series, connection matrices, integrals, invariant forms.
#include "qkernel.hpp"
#include "qseries.hpp"
#include "connection.hpp"
#include "integrals.hpp"
#include "hermitian.hpp"
