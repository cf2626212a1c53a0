#pragma once

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/combiners.hpp"
#include "ensdecomp/decomp.hpp"
#include "ensdecomp/errors.hpp"
#include "ensdecomp/estimators.hpp"
#include "ensdecomp/grid.hpp"
#include "ensdecomp/learners/boosting.hpp"
#include "ensdecomp/learners/csv.hpp"
#include "ensdecomp/learners/dataset.hpp"
#include "ensdecomp/learners/factories.hpp"
#include "ensdecomp/learners/synthetic.hpp"
#include "ensdecomp/learners/tree.hpp"
#include "ensdecomp/random.hpp"
#include "ensdecomp/tensor.hpp"
#include "ensdecomp/theory.hpp"
