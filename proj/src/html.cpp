/**
 * @file html.cpp
 * @brief Tolerant HTML tokenizer and tree builder.
 */
#include "ragkit/html.hpp"

#include "ragkit/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ragkit::html {

namespace {

constexpr std::array kVoidElements{"area", "base", "br", "col", "embed", "hr", "img", "input",
                                   "link", "meta", "source", "track", "wbr"};
constexpr std::array kRawTextElements{"script", "style"};

bool contains(const auto& set, std::string_view name) {
    return std::find(set.begin(), set.end(), name) != set.end();
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Elements an opening tag of `tag` implicitly closes when found open on the stack
/// (searching stops at `scope` boundaries).
struct ImplicitClose {
    std::string_view tag;
    std::vector<std::string_view> closes;
    std::vector<std::string_view> scope;
};

const std::vector<ImplicitClose>& implicit_rules() {
    static const std::vector<ImplicitClose> rules{
        {"li", {"li"}, {"ul", "ol"}},
        {"tr", {"tr"}, {"table", "thead", "tbody", "tfoot"}},
        {"td", {"td", "th"}, {"tr", "table"}},
        {"th", {"td", "th"}, {"tr", "table"}},
        {"p", {"p"}, {"div", "section", "article", "body", "td", "th", "li"}},
    };
    return rules;
}

bool is_block_start(std::string_view tag) {
    static constexpr std::array blocks{"p", "div", "h1", "h2", "h3", "h4", "h5", "h6", "ul", "ol",
                                       "table", "pre", "section", "article", "blockquote"};
    return contains(blocks, tag);
}

class TreeBuilder {
public:
    TreeBuilder() : root_(std::make_unique<Node>()) {
        root_->tag = "#root";
        stack_.push_back(root_.get());
    }

    void text(std::string data) {
        if (data.empty()) return;
        Node* top = stack_.back();
        if (!top->children.empty() && top->children.back()->is_text) {
            top->children.back()->text += data;
            return;
        }
        auto node = std::make_unique<Node>();
        node->is_text = true;
        node->text = std::move(data);
        top->children.push_back(std::move(node));
    }

    void open(std::string tag, std::map<std::string, std::string> attrs, bool self_closing) {
        apply_implicit_close(tag);
        auto node = std::make_unique<Node>();
        node->tag = tag;
        node->attrs = std::move(attrs);
        Node* raw = node.get();
        stack_.back()->children.push_back(std::move(node));
        if (!self_closing && !contains(kVoidElements, tag)) stack_.push_back(raw);
    }

    void close(std::string_view tag) {
        for (std::size_t i = stack_.size(); i > 1; --i) {
            if (stack_[i - 1]->tag == tag) {
                stack_.resize(i - 1);
                return;
            }
        }
    }

    std::unique_ptr<Node> finish() { return std::move(root_); }

private:
    void apply_implicit_close(std::string_view tag) {
        if (is_block_start(tag)) close_open_paragraph();
        for (const auto& rule : implicit_rules()) {
            if (rule.tag != tag) continue;
            for (std::size_t i = stack_.size(); i > 1; --i) {
                const std::string& open_tag = stack_[i - 1]->tag;
                if (contains(rule.scope, open_tag)) break;
                if (contains(rule.closes, open_tag)) {
                    stack_.resize(i - 1);
                    break;
                }
            }
        }
    }

    void close_open_paragraph() {
        for (std::size_t i = stack_.size(); i > 1; --i) {
            const std::string& open_tag = stack_[i - 1]->tag;
            if (open_tag == "p") {
                stack_.resize(i - 1);
                return;
            }
            if (open_tag != "span" && open_tag != "b" && open_tag != "i" && open_tag != "em" &&
                open_tag != "strong" && open_tag != "a") {
                return;
            }
        }
    }

    std::unique_ptr<Node> root_;
    std::vector<Node*> stack_;
};

std::map<std::string, std::string> parse_attributes(std::string_view s) {
    std::map<std::string, std::string> attrs;
    std::size_t i = 0;
    const auto skip_ws = [&] {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    };
    while (true) {
        skip_ws();
        if (i >= s.size()) break;
        const std::size_t name_start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '=' && s[i] != '/') ++i;
        std::string name = lower(s.substr(name_start, i - name_start));
        if (name.empty()) {
            ++i;
            continue;
        }
        skip_ws();
        std::string value;
        if (i < s.size() && s[i] == '=') {
            ++i;
            skip_ws();
            if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
                const char quote = s[i++];
                const std::size_t v_start = i;
                while (i < s.size() && s[i] != quote) ++i;
                value = decode_entities(s.substr(v_start, i - v_start));
                if (i < s.size()) ++i;
            } else {
                const std::size_t v_start = i;
                while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
                value = decode_entities(s.substr(v_start, i - v_start));
            }
        }
        attrs.emplace(std::move(name), std::move(value));
    }
    return attrs;
}

void collect_text(const Node& node, std::string& out) {
    if (node.is_text) {
        out += node.text;
        return;
    }
    if (node.tag == "br") {
        out += '\n';
        return;
    }
    for (const auto& child : node.children) collect_text(*child, out);
}

} // namespace

const Node* Node::find_first(std::string_view name) const {
    for (const auto& child : children) {
        if (!child->is_text && child->tag == name) return child.get();
        if (const Node* hit = child->find_first(name)) return hit;
    }
    return nullptr;
}

std::string Node::attr(std::string_view name) const {
    const auto it = attrs.find(std::string(name));
    return it == attrs.end() ? std::string() : it->second;
}

std::string decode_entities(std::string_view s) {
    static const std::map<std::string, char32_t, std::less<>> named{
        {"amp", '&'},     {"lt", '<'},      {"gt", '>'},      {"quot", '"'},   {"apos", '\''},
        {"nbsp", 0xA0},   {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026},
        {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
        {"copy", 0xA9},   {"reg", 0xAE},    {"deg", 0xB0},    {"euro", 0x20AC}, {"pound", 0xA3},
        {"times", 0xD7},  {"middot", 0xB7},
    };
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const std::size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(s[i++]);
            continue;
        }
        const std::string_view body = s.substr(i + 1, semi - i - 1);
        char32_t cp = 0;
        bool ok = false;
        if (!body.empty() && body[0] == '#') {
            try {
                std::size_t used = 0;
                const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
                const std::string digits(body.substr(hex ? 2 : 1));
                const unsigned long v = std::stoul(digits, &used, hex ? 16 : 10);
                ok = used == digits.size() && v > 0 && v <= 0x10FFFF;
                cp = static_cast<char32_t>(v);
            } catch (const std::exception&) {
                ok = false;
            }
        } else if (const auto it = named.find(body); it != named.end()) {
            cp = it->second;
            ok = true;
        }
        if (!ok) {
            out.push_back(s[i++]);
            continue;
        }
        utf8::append(out, cp);
        i = semi + 1;
    }
    return out;
}

std::unique_ptr<Node> parse(std::string_view m) {
    TreeBuilder builder;
    std::size_t i = 0;
    std::string pending;
    const auto flush = [&] {
        if (!pending.empty()) builder.text(decode_entities(pending));
        pending.clear();
    };
    while (i < m.size()) {
        if (m[i] != '<') {
            pending.push_back(m[i++]);
            continue;
        }
        if (m.compare(i, 4, "<!--") == 0) {
            flush();
            const std::size_t end = m.find("-->", i + 4);
            i = end == std::string_view::npos ? m.size() : end + 3;
            continue;
        }
        if (i + 1 < m.size() && (m[i + 1] == '!' || m[i + 1] == '?')) {
            flush();
            const std::size_t end = m.find('>', i);
            i = end == std::string_view::npos ? m.size() : end + 1;
            continue;
        }
        const bool closing = i + 1 < m.size() && m[i + 1] == '/';
        const std::size_t name_start = i + (closing ? 2 : 1);
        if (name_start >= m.size() || !std::isalpha(static_cast<unsigned char>(m[name_start]))) {
            pending.push_back(m[i++]);
            continue;
        }
        const std::size_t end = m.find('>', name_start);
        if (end == std::string_view::npos) {
            pending.append(m.substr(i));
            break;
        }
        flush();
        std::size_t name_end = name_start;
        while (name_end < end && !std::isspace(static_cast<unsigned char>(m[name_end])) && m[name_end] != '/') ++name_end;
        std::string tag = lower(m.substr(name_start, name_end - name_start));
        std::string_view rest = m.substr(name_end, end - name_end);
        const bool self_closing = !rest.empty() && rest.back() == '/';
        if (self_closing) rest.remove_suffix(1);
        i = end + 1;
        if (closing) {
            builder.close(tag);
            continue;
        }
        builder.open(tag, parse_attributes(rest), self_closing);
        if (contains(kRawTextElements, tag) && !self_closing) {
            const std::string close_tag = "</" + tag;
            std::size_t j = i;
            while (j < m.size()) {
                j = m.find("</", j);
                if (j == std::string_view::npos) break;
                if (lower(m.substr(j, close_tag.size())) == close_tag) break;
                j += 2;
            }
            const std::size_t stop = j == std::string_view::npos ? m.size() : j;
            builder.text(std::string(m.substr(i, stop - i)));
            builder.close(tag);
            const std::size_t gt = stop < m.size() ? m.find('>', stop) : std::string_view::npos;
            i = gt == std::string_view::npos ? m.size() : gt + 1;
        }
    }
    flush();
    return builder.finish();
}

std::string text_content(const Node& node) {
    std::string out;
    collect_text(node, out);
    return out;
}

} // namespace ragkit::html
