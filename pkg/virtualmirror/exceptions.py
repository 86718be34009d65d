# Base class for errors in this package
class VirtualMirrorError(Exception):
    pass


class InputError(VirtualMirrorError):
    pass


class ConfigError(InputError):
    pass


class ParseError(InputError):

    def __init__(self, source, line_no, reason):
        self.source = source
        self.line_no = line_no
        self.reason = reason

    @property
    def message(self):
        if self.line_no is None:
            return '{}: {}'.format(self.source, self.reason)
        return '{} line {}: {}'.format(self.source, self.line_no, self.reason)

    def __str__(self):
        return self.message


class InputOutOfBounds(InputError):
    def __init__(self, inpname, value):
        self.inpname = inpname
        self.value = value

    @property
    def message(self):
        return '{} is out of bounds: {}'.format(self.inpname, self.value)

    def __str__(self):
        return self.message


# Raised when a metric has no value on the given data, e.g. a degenerate graph
class UndefinedMetricError(VirtualMirrorError):
    pass
