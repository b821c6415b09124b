#pragma once

#include "syntrans/dataset.hpp"
#include "syntrans/derivation.hpp"
#include "syntrans/errors.hpp"
#include "syntrans/eval.hpp"
#include "syntrans/features.hpp"
#include "syntrans/generate.hpp"
#include "syntrans/grammar.hpp"
#include "syntrans/lexicon.hpp"
#include "syntrans/miner.hpp"
#include "syntrans/random.hpp"
#include "syntrans/structure.hpp"
#include "syntrans/text.hpp"
#include "syntrans/transform.hpp"
#include "syntrans/tree.hpp"
