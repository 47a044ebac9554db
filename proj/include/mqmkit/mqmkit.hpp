// Copyright 2026 The mqmkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Umbrella header.

#pragma once

#include "mqmkit/completion.hpp"
#include "mqmkit/error.hpp"
#include "mqmkit/hash.hpp"
#include "mqmkit/icl_sampler.hpp"
#include "mqmkit/json_io.hpp"
#include "mqmkit/llm_backend.hpp"
#include "mqmkit/loaders.hpp"
#include "mqmkit/meta_eval.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/pipeline.hpp"
#include "mqmkit/prompting.hpp"
#include "mqmkit/span_metrics.hpp"
#include "mqmkit/text.hpp"
#include "mqmkit/word_tags.hpp"
