#pragma once

#include <stdexcept>
#include <string>

namespace marl_sched {

// Malformed arguments or violated preconditions supplied by the caller.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A scheduling decision that targets a node the task can never run on.
class AssignmentError : public std::invalid_argument {
public:
    explicit AssignmentError(const std::string& what) : std::invalid_argument(what) {}
};

// Operation not valid in the object's current state (e.g. sampling an empty buffer).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// Numerical failure inside the learner (non-finite outputs or gradients).
class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace marl_sched
