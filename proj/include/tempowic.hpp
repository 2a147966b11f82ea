// Copyright 2026 The TempoWiC-MoE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "tempowic/ablation.hpp"
#include "tempowic/adversarial.hpp"
#include "tempowic/checkpoint.hpp"
#include "tempowic/config.hpp"
#include "tempowic/core.hpp"
#include "tempowic/data.hpp"
#include "tempowic/encoder.hpp"
#include "tempowic/errors.hpp"
#include "tempowic/evaluation.hpp"
#include "tempowic/experts.hpp"
#include "tempowic/lexical.hpp"
#include "tempowic/matching.hpp"
#include "tempowic/model.hpp"
#include "tempowic/moe.hpp"
#include "tempowic/pipeline.hpp"
#include "tempowic/synthetic.hpp"
#include "tempowic/tokenization.hpp"
#include "tempowic/training.hpp"
#include "tempowic/utf8.hpp"
