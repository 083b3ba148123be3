#pragma once

namespace betamq::cli {

/// Parses argv, runs the selected experiment, writes artifacts plus a
/// run manifest to the output directory. Exit codes: 0 success,
/// 1 experiment failure (report still written), 2 usage error.
int dispatch(int argc, const char* const* argv);

}  // namespace betamq::cli
