"""公式与证明文本共用的字符扫描器"""
from typing import Optional

from utils.errors import QmllSyntaxError

# 标识符允许的字符
IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'")
DIGITS = set("0123456789")


class Scanner:
    """按字符读取文本，跳过空白和 ; 注释，并记录出错位置"""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self.pos += 1
            elif c == ";":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self.pos += 1
            else:
                break

    def peek(self) -> Optional[str]:
        self.skip_ws()
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def at(self, token: str) -> bool:
        self.skip_ws()
        return self.text.startswith(token, self.pos)

    def accept(self, token: str) -> bool:
        if self.at(token):
            self.pos += len(token)
            return True
        return False

    def expect(self, token: str) -> None:
        if not self.accept(token):
            found = self.peek()
            self.fail(f"期望 '{token}'，实际为 {'输入结束' if found is None else repr(found)}")

    def read_ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in IDENT_CHARS:
            self.pos += 1
        if start == self.pos:
            self.fail("期望标识符")
        return self.text[start:self.pos]

    def read_int(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in DIGITS:
            self.pos += 1
        if start == self.pos:
            self.fail("期望自然数")
        return int(self.text[start:self.pos])

    def read_balanced(self, open_char: str = "[", close_char: str = "]") -> str:
        """读取一段括号配平的原始文本（用于矩阵字面量）"""
        self.skip_ws()
        if self.peek() != open_char:
            self.fail(f"期望 '{open_char}'")
        start = self.pos
        depth = 0
        while self.pos < len(self.text):
            c = self.text[self.pos]
            self.pos += 1
            if c == open_char:
                depth += 1
            elif c == close_char:
                depth -= 1
                if depth == 0:
                    return self.text[start:self.pos]
        self.fail("括号不配平")

    def expect_end(self) -> None:
        if self.peek() is not None:
            self.fail(f"多余的输入 {self.text[self.pos:self.pos + 10]!r}")

    def fail(self, message: str):
        raise QmllSyntaxError(message, self.pos)
