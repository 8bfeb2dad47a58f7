#include "ltmtex/features.hpp"

#include "ltmtex/error.hpp"

#include <string>

namespace ltmtex {

FeatureVector histogram(const CodeImage& image) {
    FeatureVector fv;
    fv.bins.assign(image.bin_count, 0);
    for (const std::uint32_t code : image.codes) {
        if (code >= image.bin_count) {
            throw ValidationError("code " + std::to_string(code) + " outside histogram of " +
                                  std::to_string(image.bin_count) + " bins");
        }
        ++fv.bins[code];
    }
    return fv;
}

}  // namespace ltmtex
