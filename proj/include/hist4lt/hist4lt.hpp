#pragma once

// Bucket histograms for range-query size estimation with 3LT/4LT intra-bucket indices.

#include "hist4lt/builders.hpp"
#include "hist4lt/core.hpp"
#include "hist4lt/datagen.hpp"
#include "hist4lt/error.hpp"
#include "hist4lt/estimators.hpp"
#include "hist4lt/eval.hpp"
#include "hist4lt/experiments.hpp"
#include "hist4lt/packed_tree.hpp"
#include "hist4lt/random.hpp"
