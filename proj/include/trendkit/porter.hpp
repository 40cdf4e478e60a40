#ifndef TRENDKIT_PORTER_HPP
#define TRENDKIT_PORTER_HPP

#include <string>
#include <string_view>

namespace trendkit::text {

// Porter suffix-stripping stemmer. Expects a lowercase word; words of length
// 1 or 2 are returned unchanged, matching the reference behaviour. The two
// customary departures from the 1980 paper are included (step 2 uses
// bli->ble instead of abli->able, and adds logi->log), so output agrees with
// the widely circulated 23k-word test vocabulary.
std::string porter_stem(std::string_view word);

} // namespace trendkit::text

#endif
