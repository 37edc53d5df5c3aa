"""按 seed 生成随机 SourceModel，用于 parse/pretty_print 往返测试

生成的模型只保证语法上可打印、可解析，不保证语义正确。
"""
import random

from mdmlc.model import expr as ex
from mdmlc.model.ir import (
    Annotation,
    AnnotationOverlay,
    Configuration,
    Connector,
    DataAnalyticsSpec,
    EmitAction,
    Endpoint,
    Hyperparameter,
    Import,
    Instance,
    LabelsMode,
    Message,
    ModelAlgorithm,
    Parameter,
    Port,
    PRIMITIVE_TYPES,
    Property,
    SetAction,
    SourceModel,
    State,
    Statechart,
    Thing,
    Toggle,
    Transition,
    Trigger,
    TypeRef,
)

WORDS = ("alpha", "beta", "sensor", "probe", "level", "rate", "pump", "valve")
FLOATS = (0.5, 1.25, -2.5, 3e-05, 1e+16, 0.1, 100.0)
STRINGS = ("", "plain", 'with "quotes"', "tab\tand\nnewline", "back\\slash", "中文")
ANNOTATION_VALUES = ("python_java", "rpi_3b+_python", "Int -> short", "32", "free text", "", "a.b-c")


class ModelFactory:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.counter = 0

    def name(self, prefix: str = "n") -> str:
        self.counter += 1
        return f"{self.rng.choice(WORDS)}_{prefix}{self.counter}"

    def some(self, make, low: int = 0, high: int = 3) -> tuple:
        return tuple(make() for _ in range(self.rng.randint(low, high)))

    def maybe(self, make, p: float = 0.5):
        return make() if self.rng.random() < p else None

    # ---- 表达式 ----

    def literal(self) -> ex.Literal:
        kind = self.rng.randrange(4)
        if kind == 0:
            return ex.Literal(self.rng.randint(-50, 50))
        if kind == 1:
            return ex.Literal(self.rng.choice(FLOATS))
        if kind == 2:
            return ex.Literal(self.rng.random() < 0.5)
        return ex.Literal(self.rng.choice(STRINGS))

    def expr(self, depth: int = 3) -> ex.Expr:
        r = self.rng.random()
        if depth == 0 or r < 0.3:
            return self.literal() if self.rng.random() < 0.5 else ex.Name(self.name("v"))
        if r < 0.45:
            return ex.Unary(self.rng.choice(("-", "not")), self.expr(depth - 1))
        return ex.Binary(self.rng.choice(list(ex.PRECEDENCE)), self.expr(depth - 1), self.expr(depth - 1))

    # ---- 节点 ----

    def annotations(self, high: int = 2) -> tuple:
        return self.some(lambda: Annotation(self.name("k"), self.rng.choice(ANNOTATION_VALUES)), 0, high)

    def type_ref(self) -> TypeRef:
        return TypeRef(self.rng.choice(PRIMITIVE_TYPES), self.maybe(lambda: self.rng.randint(1, 64), 0.3))

    def action(self):
        if self.rng.random() < 0.5:
            return EmitAction(self.name("p"), self.name("m"), self.some(lambda: self.expr(2)))
        return SetAction(self.name("v"), self.expr(2))

    def hyper_value(self):
        return self.rng.choice((
            self.rng.randint(-5, 64),
            self.rng.choice(FLOATS),
            self.rng.random() < 0.5,
            self.rng.choice(("relu", "adam", "32,16")),
            self.rng.choice(STRINGS),
        ))

    def analytics(self) -> DataAnalyticsSpec:
        return DataAnalyticsSpec(
            self.name("da"),
            labels=self.maybe(lambda: self.rng.choice(list(LabelsMode))),
            features=self.some(lambda: self.name("f"), 0, 4),
            prediction_results=self.maybe(lambda: self.name("y")),
            sequential=self.maybe(lambda: self.rng.random() < 0.5),
            timestamps=self.maybe(lambda: self.rng.choice(list(Toggle))),
            model_algorithm=self.maybe(lambda: ModelAlgorithm(
                self.rng.choice(("mlp", "svm", "kmeans")),
                self.some(lambda: Hyperparameter(self.name("h"), self.hyper_value()), 0, 4))),
            training_results=self.maybe(lambda: self.rng.choice(STRINGS)),
            dataset=self.maybe(lambda: "data/" + self.name("set") + ".csv"),
            annotations=self.annotations(1),
        )

    def statechart(self) -> Statechart:
        states = self.some(lambda: State(self.name("S"), self.some(self.action, 0, 2), self.annotations(1)), 1, 4)
        names = [s.name for s in states]

        def transition():
            return Transition(
                self.rng.choice(names), self.rng.choice(names),
                Trigger(self.name("p"), self.name("m")),
                self.maybe(lambda: self.expr(3)),
                self.some(self.action, 0, 2),
                self.annotations(1),
            )

        return Statechart(self.name("SC"), self.rng.choice(names), states,
                          self.some(transition, 0, 4), self.annotations(1))

    def thing(self) -> Thing:
        return Thing(
            self.name("T"),
            properties=self.some(lambda: Property(self.name("v"), self.type_ref(),
                                                  self.maybe(lambda: self.expr(2)), self.annotations(1))),
            messages=self.some(lambda: Message(
                self.name("m"), self.some(lambda: Parameter(self.name("a"), self.type_ref())), self.annotations(1))),
            ports=self.some(lambda: Port(self.name("p"), self.rng.random() < 0.5,
                                         self.some(lambda: self.name("m")), self.some(lambda: self.name("m")),
                                         self.annotations(1))),
            statechart=self.maybe(self.statechart),
            analytics=self.maybe(self.analytics),
            annotations=self.annotations(),
        )

    def configuration(self) -> Configuration:
        return Configuration(
            self.name("C"),
            self.some(lambda: Instance(self.name("i"), self.name("T"), self.annotations(1)), 0, 3),
            self.some(lambda: Connector(Endpoint(self.name("i"), self.name("p")),
                                        Endpoint(self.name("i"), self.name("p")), self.annotations(1))),
            self.annotations(),
        )

    def model(self) -> SourceModel:
        return SourceModel(
            imports=self.some(lambda: Import(self.name("file") + ".mdml")),
            things=self.some(self.thing, 0, 3),
            configurations=self.some(self.configuration, 0, 2),
            annotations=self.annotations(),
            overlays=self.some(lambda: AnnotationOverlay(
                tuple(self.name("x") for _ in range(self.rng.randint(1, 2))), self.annotations(1) or (
                    Annotation("doc", "overlay"),))),
        )


def random_model(seed: int) -> SourceModel:
    return ModelFactory(seed).model()
