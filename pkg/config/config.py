import os
from dotenv import load_dotenv

# 加载环境变量
load_dotenv()

# 量子寄存器配置
MAX_QUBITS = int(os.getenv("QMLL_MAX_QUBITS", "16"))

# 数值容差配置
UNITARY_TOLERANCE = float(os.getenv("QMLL_UNITARY_TOLERANCE", "1e-9"))  # 构造酉矩阵时的检查容差
EQUALITY_TOLERANCE = float(os.getenv("QMLL_EQUALITY_TOLERANCE", "1e-8"))  # 端到端比较容差

# 切消策略配置
DEFAULT_STRATEGY = os.getenv("QMLL_STRATEGY", "leftmost-innermost")
DEFAULT_SEED = int(os.getenv("QMLL_SEED", "0"))
STRATEGIES = ["leftmost-innermost", "random", "random-any"]

# 电路编码配置
DEFAULT_ATOM = os.getenv("QMLL_ATOM", "a")

# 输出格式配置
MATRIX_DIGITS = 17  # JSON中浮点数的有效数字

# 日志配置
LOG_LEVEL = os.getenv("QMLL_LOG_LEVEL", "WARNING").upper()
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# 路径配置
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
STATIC_FOLDER = os.path.join(PROJECT_ROOT, "static")
EXAMPLES_FOLDER = os.path.join(STATIC_FOLDER, "examples")
