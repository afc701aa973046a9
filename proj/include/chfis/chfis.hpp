#pragma once

#include "chfis/dataset.hpp"
#include "chfis/errors.hpp"
#include "chfis/io.hpp"
#include "chfis/model.hpp"
#include "chfis/parameters.hpp"
#include "chfis/rescale.hpp"
#include "chfis/solver.hpp"
#include "chfis/stability.hpp"
