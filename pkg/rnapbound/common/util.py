import json


class FakeRun(object):
    def __init__(self, config=None):
        """
        A fake run object as sacred uses, meant to be used as a replacement in unit test.
        """
        self.counter = 0
        self.config = dict(config or {})
        self.info = {}
        self.scalars = []
        self._id = None

    def log_scalar(self, name, val, step=None):
        self.counter += 1
        self.scalars.append((name, val, step))


def convert(seconds: float) -> str:
    """Seconds as h:mm:ss."""
    hour = seconds // 3600
    seconds %= 3600
    minutes = seconds // 60
    seconds %= 60
    return "%d:%02d:%02d" % (hour, minutes, seconds)


def format_prob(p: float) -> str:
    """Probabilities printed with a fixed number of significant digits."""
    return '{:.6g}'.format(p)


def dumps(obj) -> str:
    """Stable JSON for reports."""
    return json.dumps(obj, sort_keys=True, indent=2)
