#pragma once
// Umbrella header.

#include "marr/decoding.hpp"
#include "marr/io.hpp"
#include "marr/lexical_index.hpp"
#include "marr/matching.hpp"
#include "marr/metrics.hpp"
#include "marr/pipeline.hpp"
#include "marr/report.hpp"
#include "marr/rng.hpp"
#include "marr/scorer.hpp"
#include "marr/supervision.hpp"
#include "marr/synthetic.hpp"
#include "marr/text.hpp"
#include "marr/types.hpp"
#include "marr/validate.hpp"
