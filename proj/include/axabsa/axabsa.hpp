// Umbrella header.

#ifndef AXABSA_AXABSA_HPP_
#define AXABSA_AXABSA_HPP_

#include "axabsa/common.hpp"
#include "axabsa/corpus_io.hpp"
#include "axabsa/evaluation.hpp"
#include "axabsa/multilabel.hpp"
#include "axabsa/numerics.hpp"
#include "axabsa/parallel.hpp"
#include "axabsa/pipeline.hpp"
#include "axabsa/representation.hpp"
#include "axabsa/rng.hpp"
#include "axabsa/seed_selection.hpp"

#endif  // AXABSA_AXABSA_HPP_
