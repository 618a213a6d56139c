import argparse
import logging
import sys
from typing import List, Optional

from config.config import DEFAULT_SEED, DEFAULT_STRATEGY, LOG_FORMAT, LOG_LEVEL, STRATEGIES
from services.circuit_service import CircuitService
from services.machine_service import MachineService
from services.proof_service import ProofService
from utils.circuit import print_circuit
from utils.cut_elim import trace_lines
from utils.errors import QmllError
from utils.matrix import matrix_json, state_json
from utils.proof_text import print_proof

logger = logging.getLogger(__name__)

proof_service = ProofService()
machine_service = MachineService()
circuit_service = CircuitService()


class QmllApp:
    """命令行应用：读取输入、调用服务、写出结果"""

    def __init__(self, args: argparse.Namespace):
        self.args = args

    def read_input(self) -> str:
        path = self.args.file
        if path == "-":
            return sys.stdin.read()
        with open(path, "r", encoding="utf-8") as f:
            return f.read()

    def write_output(self, text: str) -> None:
        if getattr(self.args, "output", None):
            with open(self.args.output, "w", encoding="utf-8") as f:
                f.write(text + "\n")
        else:
            sys.stdout.write(text + "\n")

    def cmd_check(self) -> int:
        report = proof_service.check(self.read_input())
        self.write_output(report.model_dump_json() if self.args.json else str(report))
        return 0 if report.ok else 1

    def cmd_normalize(self) -> int:
        trace = proof_service.normalize(self.read_input(), self.args.strategy, self.args.seed)
        if self.args.trace:
            for line in trace_lines(trace):
                sys.stderr.write(line + "\n")
        self.write_output(print_proof(trace.final))
        return 0

    def cmd_run(self) -> int:
        result = machine_service.run(self.read_input(), self.args.entry, self.args.context,
                                     self.args.input, trace=self.args.trace_machine)
        if self.args.trace_machine:
            for line in result.trace:
                sys.stderr.write(line + "\n")
        self.write_output(state_json(result.final.register))
        return 0

    def cmd_semantics(self) -> int:
        result = machine_service.semantics(self.read_input(), self.args.entry, self.args.context)
        self.write_output(matrix_json(result.unitary))
        return 0

    def cmd_encode(self) -> int:
        self.write_output(print_proof(circuit_service.encode(self.read_input())))
        return 0

    def cmd_extract(self) -> int:
        c = circuit_service.extract(self.read_input(), self.args.entry, self.args.context,
                                    self.args.prune_identity)
        self.write_output(print_circuit(c))
        return 0

    def cmd_mll_matrix(self) -> int:
        self.write_output(matrix_json(proof_service.mll_matrix(self.read_input())))
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmll", description="QMLL证明的检查、切消、电路编码与QIAM运行")
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("file", help="输入文件，- 表示标准输入")
        sub.add_argument("-o", "--output", help="写入文件而不是标准输出")
        return sub

    def machine_options(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--entry", type=int, help="入口公式序号（从1开始）")
        sub.add_argument("--context", default="auto", help="auto 或洞路径，如 1.L.M")

    check = command("check", "检查证明是否良构")
    check.add_argument("--json", action="store_true", help="以JSON输出检查报告")

    normalize = command("normalize", "切消到范式")
    normalize.add_argument("--trace", action="store_true", help="在标准错误上输出每一步约简")
    normalize.add_argument("--strategy", choices=STRATEGIES, default=DEFAULT_STRATEGY)
    normalize.add_argument("--seed", type=int, default=DEFAULT_SEED)

    run = command("run", "在寄存器上运行QIAM")
    machine_options(run)
    run.add_argument("--input", help="初始寄存器：JSON振幅数组或 |010⟩，缺省为全零")
    run.add_argument("--trace-machine", action="store_true", help="在标准错误上输出机器的每一步")

    machine_options(command("semantics", "相对负上下文的酉语义矩阵"))

    command("encode", "把电路JSON编码为证明")

    extract = command("extract", "从证明抽取电路JSON")
    machine_options(extract)
    extract.add_argument("--prune-identity", action="store_true", help="去掉恒等门")

    command("mll-matrix", "无切MLL证明的公理连接矩阵")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logger.info("执行命令 %s", args.command)
    app = QmllApp(args)
    handler = getattr(app, "cmd_" + args.command.replace("-", "_"))
    try:
        return handler()
    except QmllError as e:
        sys.stderr.write(f"错误: {e}\n")
        return e.exit_code
    except OSError as e:
        sys.stderr.write(f"无法读写文件: {e}\n")
        return 2
    except RecursionError:
        sys.stderr.write("错误: 证明嵌套过深，超出递归上限\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
