#ifndef MEASURE_DYN_MEASURE_DYN_HPP
#define MEASURE_DYN_MEASURE_DYN_HPP

#include "measure_dyn/atomic_measure.hpp"
#include "measure_dyn/composition_dynamics.hpp"
#include "measure_dyn/errors.hpp"
#include "measure_dyn/grid_domain.hpp"
#include "measure_dyn/markov_dynamics.hpp"
#include "measure_dyn/parallel.hpp"
#include "measure_dyn/text_io.hpp"
#include "measure_dyn/weight_system.hpp"

#endif
