#pragma once

#include "expertrank/config.hpp"
#include "expertrank/corpus.hpp"
#include "expertrank/errors.hpp"
#include "expertrank/eval.hpp"
#include "expertrank/features.hpp"
#include "expertrank/graph.hpp"
#include "expertrank/l2r.hpp"
#include "expertrank/metrics.hpp"
#include "expertrank/rng.hpp"
#include "expertrank/text.hpp"
#include "expertrank/tokenize.hpp"
