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

#include <string_view>

// Prompt assets for contextual caption generation. The color system prompt
// and user template are reproduced byte-for-byte (including trailing spaces
// and line breaks); the position variants and the insistent retry variants
// are this project's own wording with the same placeholder set.
namespace autocomp::prompts {

inline constexpr std::string_view kVersion = "prompts/1";

inline constexpr std::string_view kColorSystem =
    "You are an expert image caption writer. \n"
    "Your task is to generate a single,\n"
    "natural-sounding sentence accurately describing \n"
    "a scene with specific objects\n"
    "and their colors. You MUST include ALL specified objects \n"
    "and their colors.\n"
    "Generate ONLY the caption text without any preamble, \n"
    "explanations, or markdown formatting.";

inline constexpr std::string_view kColorUser =
    "The caption should focus on \n"
    "these {num_obj} {obj_plural}: {obj_colors_text}.\n"
    "\n"
    "1. Keeps these objects as the main focus.\n"
    "2. Be ONE sentence long.\n"
    "3. Explicitly mention EACH object with its specific \n"
    "assigned color: {obj_colors_text}.\n"
    "4. Places them in a realistic context or background.\n"
    "5. Sound like a natural, human-written image description.\n"
    "\n"
    "For instance, for 'a green chair' and 'a yellow lamp', \n"
    "you might write: \n"
    "'A green chair stands beside a yellow lamp in a brightly lit room.'\n"
    "\n"
    "Objects and colors to include: {obj_colors_text}\n"
    "Caption:";

inline constexpr std::string_view kColorUserInsistent =
    "The caption should focus on \n"
    "these {num_obj} {obj_plural}: {obj_colors_text}.\n"
    "\n"
    "IMPORTANT: the previous caption was rejected because an object was not \n"
    "written with its exact color. Copy each phrase exactly as given, with the \n"
    "color word directly before its object: {obj_colors_text}.\n"
    "\n"
    "1. Keeps these objects as the main focus.\n"
    "2. Be ONE sentence long.\n"
    "3. Explicitly mention EACH object with its specific \n"
    "assigned color: {obj_colors_text}.\n"
    "4. Places them in a realistic context or background.\n"
    "5. Sound like a natural, human-written image description.\n"
    "\n"
    "For instance, for 'a green chair' and 'a yellow lamp', \n"
    "you might write: \n"
    "'A green chair stands beside a yellow lamp in a brightly lit room.'\n"
    "\n"
    "Objects and colors to include: {obj_colors_text}\n"
    "Caption:";

inline constexpr std::string_view kPositionSystem =
    "You are an expert image caption writer. \n"
    "Your task is to generate a single,\n"
    "natural-sounding sentence accurately describing \n"
    "a scene with specific objects\n"
    "and their spatial relations. You MUST include ALL specified objects \n"
    "and their spatial relations.\n"
    "Generate ONLY the caption text without any preamble, \n"
    "explanations, or markdown formatting.";

inline constexpr std::string_view kPositionUser =
    "The caption should focus on \n"
    "these {num_obj} {obj_plural}: {obj_colors_text}.\n"
    "\n"
    "1. Keeps these objects as the main focus.\n"
    "2. Be ONE sentence long.\n"
    "3. Explicitly mention EACH object with its specific \n"
    "assigned position: {obj_colors_text}.\n"
    "4. Places them in a realistic context or background.\n"
    "5. Sound like a natural, human-written image description.\n"
    "\n"
    "For instance, for 'a monitor to the left of a bicycle', \n"
    "you might write: \n"
    "'In a sunlit studio, a monitor to the left of a bicycle catches the light.'\n"
    "\n"
    "Objects and positions to include: {obj_colors_text}\n"
    "Caption:";

inline constexpr std::string_view kPositionUserInsistent =
    "The caption should focus on \n"
    "these {num_obj} {obj_plural}: {obj_colors_text}.\n"
    "\n"
    "IMPORTANT: the previous caption was rejected because a relation was not \n"
    "written exactly as given. Copy each phrase word for word, with the relation \n"
    "directly between its two objects: {obj_colors_text}.\n"
    "\n"
    "1. Keeps these objects as the main focus.\n"
    "2. Be ONE sentence long.\n"
    "3. Explicitly mention EACH object with its specific \n"
    "assigned position: {obj_colors_text}.\n"
    "4. Places them in a realistic context or background.\n"
    "5. Sound like a natural, human-written image description.\n"
    "\n"
    "For instance, for 'a monitor to the left of a bicycle', \n"
    "you might write: \n"
    "'In a sunlit studio, a monitor to the left of a bicycle catches the light.'\n"
    "\n"
    "Objects and positions to include: {obj_colors_text}\n"
    "Caption:";

}  // namespace autocomp::prompts
