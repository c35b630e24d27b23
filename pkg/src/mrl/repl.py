"""Interactive read-eval-print loop."""

import sys

from . import types as T
from . import values as V
from .errors import MrlError, MrlSyntaxError
from .interpreter import Env, Interpreter

PROMPT = "mrl> "
MORE = "...> "


class Repl:
    def __init__(self, interp=None, out=None):
        self.interp = interp or Interpreter(out=out)
        self.env = Env([self.interp.globals])
        self.out = out or sys.stdout

    def needs_more(self, text):
        """Whether ``text`` is an incomplete item worth continuing."""
        if text.lstrip().startswith(":"):
            return False
        try:
            from .parser import parse_repl
            parse_repl(text)
        except MrlSyntaxError as e:
            return getattr(e, "incomplete", False)
        return False

    def handle(self, text):
        """Process one complete input; returns the text to show (may be empty).
        Returns None when the session should end."""
        line = text.strip()
        if not line:
            return ""
        try:
            if line.startswith(":"):
                return self.command(line)
            v = self.interp.eval_source(text, "<repl>", self.env)
            return "" if v is None else V.render(v)
        except MrlError as e:
            return "%s: %s" % (type(e).__name__, e)
        except RecursionError:
            return "error: recursion too deep"

    def command(self, line):
        cmd, _, arg = line.partition(" ")
        arg = arg.strip()
        if cmd in (":quit", ":q"):
            return None
        if cmd == ":type":
            v = self.interp.eval_source(arg, "<repl>", self.env)
            return "void" if v is None else T.type_str(T.type_of(v))
        if cmd == ":load":
            name = self.interp.load_file(arg)
            return "loaded %s" % name
        if cmd == ":help":
            return ":quit  leave\n:type e  show the type of expression e\n:load f  load module file f"
        return "unknown command %s (try :help)" % cmd

    def run(self, stdin=None):
        stdin = stdin or sys.stdin
        interactive = stdin.isatty()
        buf = ""
        while True:
            if interactive:
                self.out.write(MORE if buf else PROMPT)
                self.out.flush()
            line = stdin.readline()
            if not line:
                if buf.strip():
                    self.emit(self.handle(buf))
                return 0
            if buf and line.lstrip().startswith(":"):
                self.emit("MrlSyntaxError: incomplete input discarded")
                buf = ""
            buf += line
            if self.needs_more(buf):
                continue
            result = self.handle(buf)
            buf = ""
            if result is None:
                return 0
            self.emit(result)

    def emit(self, text):
        if text:
            self.out.write(text + "\n")
            self.out.flush()
