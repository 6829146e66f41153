#pragma once

#include "symwsi/backend.hpp"
#include "symwsi/clustering.hpp"
#include "symwsi/corpus_io.hpp"
#include "symwsi/error.hpp"
#include "symwsi/evaluation.hpp"
#include "symwsi/lemmatizer.hpp"
#include "symwsi/ngram_backend.hpp"
#include "symwsi/pipeline.hpp"
#include "symwsi/representatives.hpp"
#include "symwsi/substitutes.hpp"
#include "symwsi/synthetic.hpp"
