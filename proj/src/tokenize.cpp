#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/locid.h>

#include <string>

#include "trafficdist/corpus.hpp"
#include "trafficdist/errors.hpp"

namespace trafficdist {
namespace {

icu::UnicodeString normalize(const icu::UnicodeString& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw ValueError("NFKC normalizer unavailable");
  icu::UnicodeString out = nfkc->normalize(text, status);
  if (U_FAILURE(status)) throw ValueError("text is not valid Unicode");
  return out;
}

void flush(icu::UnicodeString& current, Tokens& tokens) {
  if (current.isEmpty()) return;
  std::string utf8;
  current.toUTF8String(utf8);
  tokens.push_back(std::move(utf8));
  current.remove();
}

}  // namespace

Tokens tokenize(std::string_view raw) {
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  text = normalize(text);
  text.toLower(icu::Locale::getRoot());
  // Case mapping can leave composed sequences denormalized.
  text = normalize(text);

  Tokens tokens;
  icu::UnicodeString current;
  for (int32_t i = 0; i < text.length();) {
    UChar32 c = text.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      flush(current, tokens);
    } else if (u_ispunct(c)) {
      flush(current, tokens);
      current.append(c);
      flush(current, tokens);
    } else {
      current.append(c);
    }
  }
  flush(current, tokens);
  if (tokens.empty()) throw EmptyText("text is empty after trimming");
  return tokens;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace trafficdist
