// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Umbrella header: sequence algebra, i/o-map metrology, state-space
// realizations and bound arithmetic, stability certification, window nets
// and filters, polynomial comparisons, and the experiment runner.

#pragma once

#include "afm/beta.hpp"
#include "afm/certificate.hpp"
#include "afm/errors.hpp"
#include "afm/experiment.hpp"
#include "afm/iomap.hpp"
#include "afm/parallel.hpp"
#include "afm/registry.hpp"
#include "afm/rng.hpp"
#include "afm/sequence.hpp"
#include "afm/stability.hpp"
#include "afm/statespace.hpp"
#include "afm/tcn.hpp"
#include "afm/volterra.hpp"
