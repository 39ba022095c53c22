#include "mobaudit.h"

#include <algorithm>
#include <map>
#include <string>

#include <json.hpp>

#include "mobaudit/pipeline.hpp"
#include "mobaudit/types.hpp"

#ifndef MOBAUDIT_VERSION
#define MOBAUDIT_VERSION "0.0.0"
#endif

struct mobaudit_session {
  std::map<std::string, std::string> options;
  std::string last_error;
  std::string result;
};

extern "C" {

MOBAUDIT_API mobaudit_session* mobaudit_session_new(void) {
  try {
    return new mobaudit_session();
  } catch (...) {
    return nullptr;
  }
}

MOBAUDIT_API void mobaudit_session_free(mobaudit_session* session) {
  delete session;
}

MOBAUDIT_API mobaudit_status mobaudit_set_option(mobaudit_session* session, const char* key,
                                                 const char* value) {
  if (session == nullptr) return MOBAUDIT_ERR_VALIDATION;
  if (key == nullptr || value == nullptr) {
    session->last_error = "option key and value must be non-null";
    return MOBAUDIT_ERR_VALIDATION;
  }
  const auto& keys = mobaudit::known_option_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    session->last_error = std::string("unknown option '") + key + "'";
    return MOBAUDIT_ERR_VALIDATION;
  }
  try {
    session->options[key] = value;
  } catch (...) {
    session->last_error = "out of memory";
    return MOBAUDIT_ERR_VALIDATION;
  }
  return MOBAUDIT_OK;
}

MOBAUDIT_API void mobaudit_clear_options(mobaudit_session* session) {
  if (session != nullptr) session->options.clear();
}

MOBAUDIT_API mobaudit_status mobaudit_run(mobaudit_session* session, const char* command) {
  if (session == nullptr) return MOBAUDIT_ERR_VALIDATION;
  session->last_error.clear();
  session->result.clear();
  if (command == nullptr) {
    session->last_error = "command must be non-null";
    return MOBAUDIT_ERR_VALIDATION;
  }
  try {
    mobaudit::RunOutcome out = mobaudit::run_command(command, session->options);
    nlohmann::json wrapper = {{"summary", out.summary}, {"warnings", out.warnings}};
    session->result = wrapper.dump(2);
    return MOBAUDIT_OK;
  } catch (const mobaudit::NumericError& e) {
    session->last_error = e.what();
    return MOBAUDIT_ERR_NUMERIC;
  } catch (const mobaudit::ValidationError& e) {
    session->last_error = e.what();
    return MOBAUDIT_ERR_VALIDATION;
  } catch (const std::exception& e) {
    session->last_error = e.what();
    return MOBAUDIT_ERR_VALIDATION;
  } catch (...) {
    session->last_error = "unknown failure";
    return MOBAUDIT_ERR_VALIDATION;
  }
}

MOBAUDIT_API const char* mobaudit_result_json(const mobaudit_session* session) {
  return session != nullptr ? session->result.c_str() : "";
}

MOBAUDIT_API const char* mobaudit_last_error(const mobaudit_session* session) {
  return session != nullptr ? session->last_error.c_str() : "";
}

MOBAUDIT_API const char* mobaudit_version(void) {
  return MOBAUDIT_VERSION;
}

}  // extern "C"
