#pragma once

#include "emocorpus/corpus.hpp"
#include "emocorpus/error.hpp"
#include "emocorpus/eval.hpp"
#include "emocorpus/hash.hpp"
#include "emocorpus/ingest.hpp"
#include "emocorpus/jsonl.hpp"
#include "emocorpus/labeler.hpp"
#include "emocorpus/lexicon.hpp"
#include "emocorpus/masker.hpp"
#include "emocorpus/matcher.hpp"
#include "emocorpus/model.hpp"
#include "emocorpus/random.hpp"
#include "emocorpus/text.hpp"
