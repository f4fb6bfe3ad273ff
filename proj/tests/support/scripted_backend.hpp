#pragma once

#include <string>
#include <vector>

#include "t2v/backends.hpp"

namespace testutil {

// Test double that replays a fixed response sequence and records every
// request it saw.
class ScriptedBackend : public t2v::backends::ChatBackend {
  public:
    explicit ScriptedBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)),
          profile_(t2v::backends::MockChatBackend::mock_profile()) {}

    std::string complete(const t2v::backends::ChatRequest& req) override {
        requests.push_back(req);
        if (calls >= responses_.size())
            throw t2v::BackendError("scripted backend exhausted after " +
                                    std::to_string(responses_.size()) + " calls");
        return responses_[calls++];
    }

    const t2v::backends::BackendProfile& profile() const override { return profile_; }

    std::vector<t2v::backends::ChatRequest> requests;
    std::size_t calls = 0;

  private:
    std::vector<std::string> responses_;
    t2v::backends::BackendProfile profile_;
};

}  // namespace testutil
