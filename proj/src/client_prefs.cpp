#include "devaware/client_prefs.hpp"

#include <algorithm>
#include <charconv>

#include <json.hpp>

#include "devaware/xml.hpp"

namespace devaware {

namespace {

int parse_channel(const xml::Element& el, std::string_view attr) {
  const std::string* text = el.attribute(attr);
  if (!text) throw PreferencesError("<" + el.name + "> lacks attribute '" + std::string(attr) + "'");
  std::string_view s = *text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw PreferencesError("<" + el.name + "> " + std::string(attr) + "=\"" + *text + "\" is not an integer");
  if (value < 0 || value > 255)
    throw PreferencesError("<" + el.name + "> " + std::string(attr) + "=" + std::to_string(value) +
                           " is outside 0..255");
  return value;
}

}  // namespace

UserPreferences parse_preferences(std::string_view document) {
  xml::Element root;
  try {
    root = xml::parse(document);
  } catch (const xml::XmlError& e) {
    throw PreferencesError(std::string("malformed preferences: ") + e.what());
  }
  if (root.name != "user_preferences") throw PreferencesError("root element must be <user_preferences>");

  UserPreferences prefs;
  for (const auto& child : root.children) {
    if (child.name == "font_colour") {
      prefs.font_colour = {parse_channel(child, "v1"), parse_channel(child, "v2"), parse_channel(child, "v3")};
    } else if (child.name == "background_colour") {
      prefs.background_colour = {parse_channel(child, "r"), parse_channel(child, "g"), parse_channel(child, "b")};
    } else if (child.name == "font_size") {
      const std::string* v = child.attribute("value");
      if (!v) throw PreferencesError("<font_size> lacks attribute 'value'");
      if (*v == "small") prefs.font_size = FontSize::Small;
      else if (*v == "medium") prefs.font_size = FontSize::Medium;
      else if (*v == "large") prefs.font_size = FontSize::Large;
      else throw PreferencesError("<font_size> value '" + *v + "' is not small|medium|large");
    } else {
      throw PreferencesError("unknown preference <" + child.name + ">");
    }
  }
  return prefs;
}

DeviceProfile parse_profile(std::string_view json_text) {
  try {
    auto j = nlohmann::json::parse(json_text);
    DeviceProfile p{j.value("name", std::string("device")), j.at("screen_width").get<int>(),
                    j.at("screen_height").get<int>()};
    if (p.screen_width <= 0 || p.screen_height <= 0)
      throw std::invalid_argument("profile: screen dimensions must be positive");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("profile: ") + e.what());
  }
}

std::string_view to_string(SizeClass c) { return c == SizeClass::LARGE ? "LARGE" : "SMALL"; }

std::string_view to_string(FontSizeLabel l) {
  switch (l) {
    case FontSizeLabel::SIZE_LARGE: return "SIZE_LARGE";
    case FontSizeLabel::SIZE_MEDIUM: return "SIZE_MEDIUM";
    case FontSizeLabel::SIZE_SMALL: return "SIZE_SMALL";
  }
  return "?";
}

SizeClass classify_screen(const DeviceProfile& profile) {
  return std::min(profile.screen_width, profile.screen_height) >= layout::kLargeScreenMinSide ? SizeClass::LARGE
                                                                                              : SizeClass::SMALL;
}

namespace {

// Byte length of the first `max_chars` UTF-8 code points of `s`.
size_t utf8_prefix(std::string_view s, size_t max_chars, bool& cut) {
  size_t i = 0;
  size_t chars = 0;
  while (i < s.size()) {
    if (chars == max_chars) {
      cut = true;
      return i;
    }
    auto c = static_cast<unsigned char>(s[i]);
    size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    i = std::min(s.size(), i + len);
    ++chars;
  }
  cut = false;
  return i;
}

}  // namespace

RenderPlan build_render_plan(const Record& response, const DeviceProfile& profile, const UserPreferences& prefs) {
  if (response.values.empty()) throw std::invalid_argument("render: response has no fields");
  if (profile.screen_width <= 0 || profile.screen_height <= 0)
    throw std::invalid_argument("render: screen dimensions must be positive");

  RenderPlan plan;
  plan.size_class = classify_screen(profile);
  const bool large = plan.size_class == SizeClass::LARGE;
  if (!large || prefs.font_size == FontSize::Small)
    plan.font_size_label = FontSizeLabel::SIZE_SMALL;
  else
    plan.font_size_label = FontSizeLabel::SIZE_LARGE;
  plan.foreground = prefs.font_colour;
  plan.background = prefs.background_colour;

  const int line_height = large ? layout::kLineHeightLarge : layout::kLineHeightSmall;
  const int char_width = large ? layout::kCharWidthLarge : layout::kCharWidthSmall;
  const int x = profile.screen_width > layout::kLeftMargin ? layout::kLeftMargin : 0;
  const int top = std::min(layout::kTopBaseline, profile.screen_height - 1);
  const int per_page = std::max(1, (profile.screen_height - 1 - top) / line_height + 1);
  const size_t max_chars = static_cast<size_t>(std::max(0, (profile.screen_width - x) / char_width));

  for (size_t i = 0; i < response.values.size(); ++i) {
    const auto& [field, value] = response.values[i];
    RenderLine line;
    line.field = field;
    bool cut = false;
    line.value = value.substr(0, utf8_prefix(value, max_chars, cut));
    line.truncated = cut;
    line.x = x;
    line.page = static_cast<int>(i) / per_page;
    line.y = top + static_cast<int>(i % static_cast<size_t>(per_page)) * line_height;
    plan.lines.push_back(std::move(line));
  }
  return plan;
}

std::string RenderPlan::to_json() const {
  using ojson = nlohmann::ordered_json;
  auto rgb = [](const Rgb& c) { return ojson::array({c.r, c.g, c.b}); };
  ojson lines_json = ojson::array();
  for (const auto& l : lines)
    lines_json.push_back(ojson{{"field", l.field},
                               {"value", l.value},
                               {"x", l.x},
                               {"y", l.y},
                               {"page", l.page},
                               {"truncated", l.truncated}});
  ojson doc{{"size_class", to_string(size_class)},
            {"font_face", font_face},
            {"font_style", font_style},
            {"font_size_label", to_string(font_size_label)},
            {"foreground", rgb(foreground)},
            {"background", rgb(background)},
            {"lines", std::move(lines_json)}};
  return doc.dump(2) + "\n";
}

Envelope build_invocation(DeviceClass device, std::string operation, FieldList args) {
  Envelope env{std::nullopt, Call{std::move(operation), std::move(args)}};
  if (device != DeviceClass::UNSPECIFIED) env.header = DeviceHeader{device};
  return env;
}

}  // namespace devaware
