#include "freephish/html.hpp"

#include "freephish/common.hpp"

#include <array>
#include <cctype>

namespace freephish::html {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool is_raw_text(std::string_view name) {
    return name == "script" || name == "style" || name == "textarea" || name == "title" ||
           name == "xmp";
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class Tokenizer {
public:
    explicit Tokenizer(std::string_view s) : s_(s) {}

    std::vector<Token> run() {
        while (pos_ < s_.size()) {
            if (s_[pos_] == '<' && try_markup()) continue;
            text_until_markup();
        }
        flush_text();
        return std::move(out_);
    }

private:
    bool try_markup() {
        const std::string_view rest = s_.substr(pos_);
        if (rest.starts_with("<!--")) {
            flush_text();
            const auto end = s_.find("-->", pos_ + 4);
            Token t;
            t.kind = TokenKind::comment;
            t.text = std::string(s_.substr(pos_ + 4, end == std::string_view::npos
                                                          ? std::string_view::npos
                                                          : end - pos_ - 4));
            out_.push_back(std::move(t));
            pos_ = end == std::string_view::npos ? s_.size() : end + 3;
            return true;
        }
        if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {
            // doctype, CDATA, processing instructions: dropped
            flush_text();
            const auto end = s_.find('>', pos_);
            pos_ = end == std::string_view::npos ? s_.size() : end + 1;
            return true;
        }
        if (rest.size() >= 3 && rest[1] == '/' && is_alpha(rest[2])) {
            flush_text();
            std::size_t i = pos_ + 2;
            const std::size_t name_start = i;
            while (i < s_.size() && !is_space(s_[i]) && s_[i] != '>' && s_[i] != '/') ++i;
            Token t;
            t.kind = TokenKind::end_tag;
            t.name = to_lower(s_.substr(name_start, i - name_start));
            const auto end = s_.find('>', i);
            pos_ = end == std::string_view::npos ? s_.size() : end + 1;
            out_.push_back(std::move(t));
            return true;
        }
        if (rest.size() >= 2 && is_alpha(rest[1])) {
            flush_text();
            start_tag();
            return true;
        }
        return false;
    }

    void start_tag() {
        std::size_t i = pos_ + 1;
        const std::size_t name_start = i;
        while (i < s_.size() && !is_space(s_[i]) && s_[i] != '>' && s_[i] != '/') ++i;
        Token t;
        t.kind = TokenKind::start_tag;
        t.name = to_lower(s_.substr(name_start, i - name_start));

        while (i < s_.size()) {
            while (i < s_.size() && (is_space(s_[i]) || s_[i] == '/')) {
                if (s_[i] == '/' && i + 1 < s_.size() && s_[i + 1] == '>') t.self_closing = true;
                ++i;
            }
            if (i >= s_.size() || s_[i] == '>') break;
            const std::size_t an_start = i;
            // '=' as the first character belongs to the name (HTML tokenizer rule)
            ++i;
            while (i < s_.size() && !is_space(s_[i]) && s_[i] != '=' && s_[i] != '>' && s_[i] != '/')
                ++i;
            Attribute a;
            a.name = to_lower(s_.substr(an_start, i - an_start));
            std::size_t j = i;
            while (j < s_.size() && is_space(s_[j])) ++j;
            if (j < s_.size() && s_[j] == '=') {
                ++j;
                while (j < s_.size() && is_space(s_[j])) ++j;
                a.has_value = true;
                if (j < s_.size() && (s_[j] == '"' || s_[j] == '\'')) {
                    const char q = s_[j];
                    const auto end = s_.find(q, j + 1);
                    const std::size_t stop = end == std::string_view::npos ? s_.size() : end;
                    a.value = decode_entities(s_.substr(j + 1, stop - j - 1));
                    i = stop == s_.size() ? stop : stop + 1;
                } else {
                    const std::size_t v_start = j;
                    while (j < s_.size() && !is_space(s_[j]) && s_[j] != '>') ++j;
                    a.value = decode_entities(s_.substr(v_start, j - v_start));
                    i = j;
                }
            }
            if (t.find(a.name) == nullptr) t.attributes.push_back(std::move(a));
        }
        pos_ = i < s_.size() ? i + 1 : s_.size();
        const std::string name = t.name;
        const bool self_closing = t.self_closing;
        out_.push_back(std::move(t));

        if (is_raw_text(name) && !self_closing) {
            // find the matching close tag, case-insensitively
            std::size_t k = pos_;
            std::size_t close = std::string_view::npos;
            while ((k = s_.find("</", k)) != std::string_view::npos) {
                if (starts_with_icase(s_.substr(k + 2), name)) {
                    const std::size_t after = k + 2 + name.size();
                    if (after >= s_.size() || is_space(s_[after]) || s_[after] == '>' ||
                        s_[after] == '/') {
                        close = k;
                        break;
                    }
                }
                k += 2;
            }
            const std::size_t stop = close == std::string_view::npos ? s_.size() : close;
            if (stop > pos_) {
                Token body;
                body.kind = TokenKind::text;
                const std::string_view raw = s_.substr(pos_, stop - pos_);
                body.text = (name == "script" || name == "style") ? std::string(raw)
                                                                  : decode_entities(raw);
                out_.push_back(std::move(body));
            }
            pos_ = stop;
        }
    }

    void text_until_markup() {
        std::size_t next = s_.find('<', pos_ + 1);
        if (next == std::string_view::npos) next = s_.size();
        pending_.append(s_.substr(pos_, next - pos_));
        pos_ = next;
    }

    void flush_text() {
        if (pending_.empty()) return;
        Token t;
        t.kind = TokenKind::text;
        t.text = decode_entities(pending_);
        pending_.clear();
        out_.push_back(std::move(t));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::string pending_;
    std::vector<Token> out_;
};

}  // namespace

const Attribute* Token::find(std::string_view attr_name) const {
    for (const auto& a : attributes)
        if (a.name == attr_name) return &a;
    return nullptr;
}

std::optional<std::string> Token::attr(std::string_view attr_name) const {
    if (const auto* a = find(attr_name)) return a->value;
    return std::nullopt;
}

std::vector<Token> tokenize(std::string_view markup) { return Tokenizer(markup).run(); }

std::string decode_entities(std::string_view text) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 7> named{{
        {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "},
        {"#39", "'"},
    }};
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '&') {
            out += text[i++];
            continue;
        }
        const auto semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += text[i++];
            continue;
        }
        const std::string_view ent = text.substr(i + 1, semi - i - 1);
        bool done = false;
        for (const auto& [k, v] : named) {
            if (ent == k) {
                out += v;
                done = true;
                break;
            }
        }
        if (!done && ent.size() >= 2 && ent[0] == '#') {
            const bool hex = ent[1] == 'x' || ent[1] == 'X';
            const std::string_view digits = ent.substr(hex ? 2 : 1);
            unsigned long cp = 0;
            bool ok = !digits.empty();
            for (char c : digits) {
                const int d = hex ? (std::isxdigit(static_cast<unsigned char>(c))
                                         ? (std::isdigit(static_cast<unsigned char>(c))
                                                ? c - '0'
                                                : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10)
                                         : -1)
                                  : (std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : -1);
                if (d < 0 || cp > 0x10FFFF) {
                    ok = false;
                    break;
                }
                cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(d);
            }
            if (ok) {
                append_utf8(out, cp);
                done = true;
            }
        }
        if (done) {
            i = semi + 1;
        } else {
            out += text[i++];
        }
    }
    return out;
}

bool is_void_element(std::string_view n) {
    static constexpr std::array<std::string_view, 14> voids{
        "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param",
        "source", "track", "wbr"};
    for (auto v : voids)
        if (v == n) return true;
    return false;
}

}  // namespace freephish::html
