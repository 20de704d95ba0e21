/**
 * @file prompts.hpp
 * @brief Versioned prompt templates compiled in from assets/prompts.
 */
#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ragkit::prompts {

struct Template {
    std::string_view id; ///< e.g. "judge.v1"
    std::string_view text;
};

const Template& judge();
const Template& qa_simple();
const Template& qa_complex();
const Template& validate();
const Template& answer();

using Bindings = std::vector<std::pair<std::string_view, std::string_view>>;

/// Single-pass substitution of `{name}` markers. Substituted values are never
/// re-scanned, and unknown markers are left as they are.
std::string render(std::string_view tpl, const Bindings& values);

} // namespace ragkit::prompts
