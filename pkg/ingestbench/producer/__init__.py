from ingestbench.producer.batch import AddResult, Batch, BatchPlan, try_add
from ingestbench.producer.buffer import BufferAccount
from ingestbench.producer.client import DeliveryReceipt, Producer, flush, send

__all__ = [
    "AddResult",
    "Batch",
    "BatchPlan",
    "BufferAccount",
    "DeliveryReceipt",
    "Producer",
    "flush",
    "send",
    "try_add",
]
