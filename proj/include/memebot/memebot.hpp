#ifndef MEMEBOT_MEMEBOT_HPP
#define MEMEBOT_MEMEBOT_HPP

#include "memebot/catalog.hpp"
#include "memebot/compositor/font.hpp"
#include "memebot/compositor/image.hpp"
#include "memebot/compositor/render.hpp"
#include "memebot/corpus.hpp"
#include "memebot/error.hpp"
#include "memebot/eval/bleu.hpp"
#include "memebot/eval/kappa.hpp"
#include "memebot/eval/ratings.hpp"
#include "memebot/generation/beam.hpp"
#include "memebot/generation/pipeline.hpp"
#include "memebot/models/checkpoint.hpp"
#include "memebot/models/generator.hpp"
#include "memebot/models/selector.hpp"
#include "memebot/models/training.hpp"
#include "memebot/models/transformer.hpp"
#include "memebot/neural/autograd.hpp"
#include "memebot/neural/grad_check.hpp"
#include "memebot/neural/layers.hpp"
#include "memebot/neural/optim.hpp"
#include "memebot/neural/tensor.hpp"
#include "memebot/service/server.hpp"
#include "memebot/text.hpp"
#include "memebot/util.hpp"

#endif  // MEMEBOT_MEMEBOT_HPP
