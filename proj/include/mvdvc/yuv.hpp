#pragma once

#include <string>
#include <vector>

#include "mvdvc/frame.hpp"

namespace mvdvc {

// Planar 4:2:0, 8-bit. Luma is decoded into frames; the chroma planes ride
// along untouched so written output reproduces them byte-exact.
ViewSequence read_yuv(const std::string& path, int width, int height, int frames);
MultiViewSequence read_yuv_views(const std::vector<std::string>& paths, int width, int height,
                                 int frames, double fps);

// writes luma plus stored chroma; frames with no chroma get flat mid-grey
void write_yuv(const std::string& path, const ViewSequence& seq);

}  // namespace mvdvc
