// mtjr/log.h

// Copyright 2026  MTJR authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MTJR_LOG_H_
#define MTJR_LOG_H_

#include <iostream>
#include <sstream>

namespace mtjr {

// 0 = warnings only, 1 = progress (default), 2 = verbose.
int GetVerbose();
void SetVerbose(int level);

class LogMessage {
 public:
  explicit LogMessage(const char *tag) { ss_ << tag << ' '; }
  ~LogMessage() { std::cerr << ss_.str() << std::endl; }
  template <typename T>
  LogMessage &operator<<(const T &v) {
    ss_ << v;
    return *this;
  }

 private:
  std::ostringstream ss_;
};

}  // namespace mtjr

#define MTJR_LOG \
  if (::mtjr::GetVerbose() >= 1) ::mtjr::LogMessage("LOG")
#define MTJR_VLOG(v) \
  if (::mtjr::GetVerbose() >= (v)) ::mtjr::LogMessage("VLOG")
#define MTJR_WARN ::mtjr::LogMessage("WARNING")

#endif  // MTJR_LOG_H_
