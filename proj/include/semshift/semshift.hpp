#pragma once

#include "semshift/analysis.hpp"
#include "semshift/change.hpp"
#include "semshift/clustering.hpp"
#include "semshift/corpus.hpp"
#include "semshift/embeddings.hpp"
#include "semshift/error.hpp"
#include "semshift/keywords.hpp"
#include "semshift/masking.hpp"
#include "semshift/matrix.hpp"
#include "semshift/pipeline.hpp"
#include "semshift/random.hpp"
#include "semshift/text.hpp"
