// Copyright 2026 The ocrpost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OCRPOST_OCRPOST_HPP
#define OCRPOST_OCRPOST_HPP

#include "ocrpost/alignment.hpp"
#include "ocrpost/candidates.hpp"
#include "ocrpost/confusion.hpp"
#include "ocrpost/corpus.hpp"
#include "ocrpost/corpus_io.hpp"
#include "ocrpost/error_channel.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/eval.hpp"
#include "ocrpost/features.hpp"
#include "ocrpost/language_model.hpp"
#include "ocrpost/logistic.hpp"
#include "ocrpost/pipeline.hpp"
#include "ocrpost/unicode.hpp"

#endif  // OCRPOST_OCRPOST_HPP
