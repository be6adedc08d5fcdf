// Copyright 2026 The autocomp Authors
// SPDX-License-Identifier: Apache-2.0
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

#pragma once

// Umbrella header.

#include "autocomp/arrangement.hpp"
#include "autocomp/backend/cache.hpp"
#include "autocomp/backend/fixture_builder.hpp"
#include "autocomp/backend/http.hpp"
#include "autocomp/backend/mock.hpp"
#include "autocomp/backend/protocol.hpp"
#include "autocomp/blind.hpp"
#include "autocomp/caption.hpp"
#include "autocomp/concept.hpp"
#include "autocomp/contextual.hpp"
#include "autocomp/dataset.hpp"
#include "autocomp/diversity.hpp"
#include "autocomp/evaluator.hpp"
#include "autocomp/negatives.hpp"
#include "autocomp/pipeline.hpp"
#include "autocomp/report.hpp"
#include "autocomp/scoring.hpp"
#include "autocomp/validation.hpp"
#include "autocomp/vocabulary.hpp"
