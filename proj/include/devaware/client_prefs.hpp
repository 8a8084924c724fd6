#pragma once

// Client side: device-tagged invocations, and render plans that lay out a
// response for a given screen and user preference file. The plan is a pure
// function of (response, profile, preferences).

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "devaware/envelope.hpp"
#include "devaware/runtime.hpp"

namespace devaware {

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
  bool operator==(const Rgb&) const = default;
};

enum class FontSize { Small, Medium, Large };

struct UserPreferences {
  Rgb font_colour{0, 0, 0};
  FontSize font_size = FontSize::Medium;
  Rgb background_colour{255, 255, 255};

  bool operator==(const UserPreferences&) const = default;
};

class PreferencesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a `<user_preferences>` document:
///
///   <user_preferences>
///     <font_colour v1="255" v2="0" v3="0"/>
///     <font_size value="large"/>
///     <background_colour r="255" g="196" b="0"/>
///   </user_preferences>
///
/// Every child is optional. Channels must lie in 0..255.
UserPreferences parse_preferences(std::string_view xml);

struct DeviceProfile {
  std::string name;
  int screen_width = 0;
  int screen_height = 0;
};

/// `{"name": "...", "screen_width": W, "screen_height": H}`
DeviceProfile parse_profile(std::string_view json_text);

enum class SizeClass { LARGE, SMALL };
enum class FontSizeLabel { SIZE_LARGE, SIZE_MEDIUM, SIZE_SMALL };

std::string_view to_string(SizeClass c);
std::string_view to_string(FontSizeLabel l);

namespace layout {
inline constexpr int kLargeScreenMinSide = 240;
inline constexpr int kLeftMargin = 40;
inline constexpr int kTopBaseline = 10;
inline constexpr int kLineHeightLarge = 24;
inline constexpr int kLineHeightSmall = 14;
inline constexpr int kCharWidthLarge = 10;
inline constexpr int kCharWidthSmall = 6;
}  // namespace layout

/// LARGE iff min(width, height) >= 240 px.
SizeClass classify_screen(const DeviceProfile& profile);

struct RenderLine {
  std::string field;
  std::string value;  ///< possibly truncated to the screen width
  int x = 0;
  int y = 0;
  int page = 0;
  bool truncated = false;

  bool operator==(const RenderLine&) const = default;
};

struct RenderPlan {
  SizeClass size_class = SizeClass::LARGE;
  std::string font_face = "PROPORTIONAL";
  std::string font_style = "BOLD";
  FontSizeLabel font_size_label = FontSizeLabel::SIZE_LARGE;
  Rgb foreground;
  Rgb background;
  std::vector<RenderLine> lines;

  std::string to_json() const;
  bool operator==(const RenderPlan&) const = default;
};

/// One line per response field. Lines start at (40, 10) and advance by 24 px
/// on LARGE screens, 14 px on SMALL ones; lines that would fall below the
/// screen continue on the next page. Values wider than the screen are cut and
/// flagged. Throws std::invalid_argument for an empty response or a
/// non-positive screen dimension.
RenderPlan build_render_plan(const Record& response, const DeviceProfile& profile, const UserPreferences& prefs);

/// Header present iff device is not UNSPECIFIED.
Envelope build_invocation(DeviceClass device, std::string operation, FieldList args);

}  // namespace devaware
