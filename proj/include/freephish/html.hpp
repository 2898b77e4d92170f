#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Lenient HTML tokenizer. Never throws on malformed markup: unterminated
// constructs run to end of input, stray '<' become text.
namespace freephish::html {

struct Attribute {
    std::string name;   // lowercased
    std::string value;  // entity-decoded, case preserved
    bool has_value = false;
};

enum class TokenKind { start_tag, end_tag, comment, text };

struct Token {
    TokenKind kind = TokenKind::text;
    std::string name;  // tag name, lowercased (tags only)
    std::vector<Attribute> attributes;
    bool self_closing = false;
    std::string text;  // comment body or text content (entity-decoded except inside script/style)

    const Attribute* find(std::string_view attr_name) const;
    /// Attribute value, or nullopt when the attribute is absent.
    std::optional<std::string> attr(std::string_view attr_name) const;
};

std::vector<Token> tokenize(std::string_view markup);

std::string decode_entities(std::string_view text);

bool is_void_element(std::string_view tag_name);

}  // namespace freephish::html
