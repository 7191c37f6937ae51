// Copyright 2026 The evoqa Authors
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

// Small deterministic UTF-8 helpers. Case folding covers ASCII, Latin-1,
// Latin Extended-A, Greek and Cyrillic; other scripts pass through unchanged.

#ifndef EVOQA_TEXT_HPP_
#define EVOQA_TEXT_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace evoqa::text {

// Decodes UTF-8. Invalid bytes decode as U+FFFD and consume one byte.
std::u32string Decode(std::string_view utf8);
std::string Encode(std::u32string_view cps);
void AppendUtf8(std::string& out, char32_t cp);

char32_t FoldCase(char32_t cp);
std::string Lowercase(std::string_view utf8);

// Letters and digits in the covered scripts, plus any code point above
// U+00FF that is not in a known punctuation/symbol block.
bool IsWordCodePoint(char32_t cp);

// Lowercased maximal runs of word code points.
std::vector<std::string> Tokenize(std::string_view utf8);

std::string_view Trim(std::string_view s);

// Number of code points in a UTF-8 string.
std::size_t CodePointCount(std::string_view utf8);

}  // namespace evoqa::text

#endif  // EVOQA_TEXT_HPP_
