#pragma once

namespace dvpp {

/// Exit codes: 0 success, 1 compliance or stability failure, 2 usage or input error.
int cli_main(int argc, char** argv);

}  // namespace dvpp
