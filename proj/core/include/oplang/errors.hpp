#ifndef OPLANG_ERRORS_HPP
#define OPLANG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace oplang {

// Base class for every failure the pipeline can surface. The short name
// (e.g. "EmptyDocument") is what the CLI prints before the detail message.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define OPLANG_DEFINE_ERROR(type, tag)                                        \
    class type : public Error {                                               \
    public:                                                                    \
        explicit type(const std::string& message) : Error(tag, message) {}     \
    }

OPLANG_DEFINE_ERROR(EmptyDocumentError, "EmptyDocument");
OPLANG_DEFINE_ERROR(MalformedInputError, "MalformedInput");
OPLANG_DEFINE_ERROR(ManifestMismatchError, "ManifestMismatch");
OPLANG_DEFINE_ERROR(EmptyVocabularyError, "EmptyVocabulary");
OPLANG_DEFINE_ERROR(DegenerateCorpusError, "DegenerateCorpus");
OPLANG_DEFINE_ERROR(IndexOutOfRangeError, "IndexOutOfRange");
OPLANG_DEFINE_ERROR(ShapeMismatchError, "ShapeMismatch");
OPLANG_DEFINE_ERROR(EmptySequenceError, "EmptySequence");
OPLANG_DEFINE_ERROR(NonFiniteLossError, "NonFiniteLoss");
OPLANG_DEFINE_ERROR(ClassTooSmallError, "ClassTooSmall");
OPLANG_DEFINE_ERROR(SingleClassTestSetError, "SingleClassTestSet");
OPLANG_DEFINE_ERROR(IoFailureError, "IoFailure");
OPLANG_DEFINE_ERROR(ConfigError, "ConfigError");

#undef OPLANG_DEFINE_ERROR

} // namespace oplang

#endif
