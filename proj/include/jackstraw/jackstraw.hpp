#ifndef JACKSTRAW_JACKSTRAW_HPP
#define JACKSTRAW_JACKSTRAW_HPP

#include "error.hpp"
#include "matrix.hpp"
#include "matrix_io.hpp"
#include "linear_model.hpp"
#include "engine.hpp"
#include "significance.hpp"
#include "simulation.hpp"

#endif
