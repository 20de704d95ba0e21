#include "ragkit/prompts.hpp"

#include "ragkit/prompt_assets.hpp"

namespace ragkit::prompts {

const Template& judge() {
    static const Template t{"judge.v1", assets::judge_v1};
    return t;
}

const Template& qa_simple() {
    static const Template t{"qa_simple.v1", assets::qa_simple_v1};
    return t;
}

const Template& qa_complex() {
    static const Template t{"qa_complex.v1", assets::qa_complex_v1};
    return t;
}

const Template& validate() {
    static const Template t{"validate.v1", assets::validate_v1};
    return t;
}

const Template& answer() {
    static const Template t{"answer.v1", assets::answer_v1};
    return t;
}

std::string render(std::string_view tpl, const Bindings& values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] == '{') {
            const std::size_t close = tpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string_view name = tpl.substr(i + 1, close - i - 1);
                bool replaced = false;
                for (const auto& [key, value] : values) {
                    if (key == name) {
                        out.append(value);
                        replaced = true;
                        break;
                    }
                }
                if (replaced) {
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tpl[i++]);
    }
    return out;
}

} // namespace ragkit::prompts
