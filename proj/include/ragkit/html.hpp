/**
 * @file html.hpp
 * @brief Tolerant parser for the block-level HTML emitted by document parsers.
 *
 * Produces a small element tree. Unclosed elements are closed by their parent's
 * end tag, stray end tags are ignored, and `p`, `li`, `tr`, `td`, `th` close an
 * open sibling of the same family the way browsers do.
 */
#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit::html {

struct Node {
    bool is_text = false;
    std::string tag;   ///< lowercase element name, empty for text nodes
    std::string text;  ///< decoded character data for text nodes
    std::map<std::string, std::string> attrs;
    std::vector<std::unique_ptr<Node>> children;

    const Node* find_first(std::string_view name) const;
    std::string attr(std::string_view name) const;
};

/// Parses a fragment or document into a synthetic root element (tag "#root").
std::unique_ptr<Node> parse(std::string_view markup);

std::string decode_entities(std::string_view s);

/// Concatenated descendant text. `br` contributes a newline.
std::string text_content(const Node& node);

} // namespace ragkit::html
