class CapExceeded(Exception):
    """A bounded search ran past its configured resource cap.

    Raised instead of returning a possibly wrong answer; callers that want a
    larger search re-run with a bigger cap.
    """
